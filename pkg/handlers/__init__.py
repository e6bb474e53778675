"""
Command handlers, one module per subcommand, each exposing a router.
"""
