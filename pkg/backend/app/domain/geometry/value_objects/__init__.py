"""
Objetos de valor do domínio de geometria.
"""
