#!/usr/bin/env python3
"""
Ramiflow - Transporte ramificado discreto
Script principal para ejecutar las tareas de la línea de comandos.
"""

import sys
import os

# Agregar los directorios src y config al path
sys.path.insert(0, os.path.join(os.path.dirname(__file__), 'src'))
sys.path.insert(0, os.path.join(os.path.dirname(__file__), 'config'))

from ramiflow_cli import main as cli_main

if __name__ == "__main__":
    # El banner lo imprime la línea de comandos
    sys.exit(cli_main())
