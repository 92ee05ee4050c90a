"""
Mesures fibrées à support fini, marginales des labels et lecture/écriture.
"""
