"""Test suite for the meandim package."""
