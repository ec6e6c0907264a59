"""HTTP service wrapping the core pipelines.

The FastAPI app in :mod:`.app` exposes each pipeline as a JSON endpoint;
:mod:`.handlers` holds the transport-free implementations so the CLI can
call them in-process without a running server.
"""
