"""
Contextuality toolkit scripts package.

Modules are imported by bare name (``from config import ...``); run the
CLI as ``python scripts/contextuality_cli.py <command>``.
"""
