"""
Módulo core para componentes essenciais do sistema
"""