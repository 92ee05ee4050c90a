"""
Partitions canoniques, moyennes de champs par cellule, tirages initiaux et variation.
"""
