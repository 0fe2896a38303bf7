"""
ASGI application entry point for hyperstab deployment
"""
from main import app

# ASGI application reference
application = app
