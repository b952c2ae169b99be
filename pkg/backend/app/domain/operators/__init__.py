"""
Domínio dos operadores discretos (gradiente, Hessiana, determinante).
"""
