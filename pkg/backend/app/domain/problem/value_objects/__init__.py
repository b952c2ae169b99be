"""
Objetos de valor do domínio de problemas.
"""
