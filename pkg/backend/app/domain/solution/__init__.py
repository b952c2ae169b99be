"""
Domínio das soluções: estado do integrador, diagnósticos por passo e traços.
"""
