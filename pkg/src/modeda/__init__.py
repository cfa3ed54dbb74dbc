"""Mod-EDA: sentiment-reactive, embedding-driven text augmentation."""

__version__ = "0.1.0"
