"""
Constantes explicites, bornes a priori, stabilité et taux de convergence.
"""
