"""Percolation models and invariant checks on finite graphs.

Modules
-------
lattice      finite graph substrates (Z^2 windows/tori, hex patches, paths, trees)
randomness   seed-addressed Philox streams
interchange  interchange process with a treap cycle index
corner       corner percolation, heights, paths and surgery
loopmodel    loop O(n) model: weights, enumeration, face-flip sampler
zoo          Poisson zoo site percolation
clusters     components, SDRW, stationarity, densities, mass transport
"""
__version__ = "0.1.0"
