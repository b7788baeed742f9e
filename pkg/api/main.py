"""
FastAPI application entry point for the hybrid teleportation simulator.
"""

from typing import Optional

import uvicorn
from fastapi import FastAPI
from fastapi.middleware.cors import CORSMiddleware

from api.routers import config, protocol
from config.settings import get_config

app = FastAPI(
    title="Hybrid Teleportation API",
    description="Local API for running and verifying the controlled bidirectional hybrid protocol",
    version="1.0.0",
)

# CORS: allow local front-ends to connect
app.add_middleware(
    CORSMiddleware,
    allow_origins=["*"],
    allow_credentials=True,
    allow_methods=["*"],
    allow_headers=["*"],
)

# ── Routers ───────────────────────────────────────────────────────────
app.include_router(config.router, prefix="/api/config", tags=["Config"])
app.include_router(protocol.router, prefix="/api", tags=["Protocol"])


# ── Health check ──────────────────────────────────────────────────────
@app.get("/health")
async def health():
    return {"status": "ok"}


# ── Runner ────────────────────────────────────────────────────────────
def run_server(host: Optional[str] = None, port: Optional[int] = None):
    """Run the API server; host and port default to the active profile."""
    server = get_config().effective().server
    uvicorn.run("api.main:app", host=host or server.host, port=port or server.port, reload=False)


if __name__ == "__main__":
    run_server()
