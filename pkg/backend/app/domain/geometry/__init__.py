"""
Domínio de geometria: regiões uniformemente convexas e grades cartesianas com nós de corte.
"""
