"""
Champs de vecteurs v(t, μ, ω, x) et catalogue de modèles.
"""
