"""
Module d'exportation des résultats (trajectoires, courbes, convergence, validation).
"""
