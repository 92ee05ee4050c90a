"""
Distances de Wasserstein exactes, fibrées et duales.
"""
