"""
Domínio da dualidade de Legendre: grade dual, campo transformado e resíduo dual.
"""
