"""
Intégration des systèmes de particules, schéma d'Euler retardé et itération de Picard.
"""
