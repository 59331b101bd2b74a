"""Integration tests suite for the meandim package."""
