"""
Domínio dos dados do problema: ψ, φ, tipo de equação e condições (P1)-(P3).
"""
