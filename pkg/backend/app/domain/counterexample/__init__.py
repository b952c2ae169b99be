"""
Domínio dos contraexemplos: perturbação por bump, problema radial e relatórios
de perda de convexidade.
"""
