"""
Casos de uso dos comandos do pmaflow.
"""
