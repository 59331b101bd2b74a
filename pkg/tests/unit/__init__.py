"""Unit tests suite for the meandim package."""
