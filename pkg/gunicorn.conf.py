# Gunicorn configuration for the hyperstab API
import os

bind = f"0.0.0.0:{os.getenv('PORT', '10000')}"
workers = 1
worker_class = "uvicorn.workers.UvicornWorker"
worker_connections = 1000
# exact LPs and homology on Δ(3,6) can take a while
timeout = 120
keepalive = 2
