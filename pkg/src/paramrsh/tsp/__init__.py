"""Euclidean TSP: geometry, tour operators and the three search families."""
