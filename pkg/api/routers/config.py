"""
Config API router: manage configuration profiles.
"""

from fastapi import APIRouter, HTTPException
from pydantic import BaseModel

from config.settings import get_config, reset_config

router = APIRouter()


class ProfileCreate(BaseModel):
    name: str
    copy_from: str | None = None


class ConfigUpdate(BaseModel):
    protocol: dict | None = None
    enumeration: dict | None = None
    output: dict | None = None
    server: dict | None = None
    log_level: str | None = None


# ── Active config ─────────────────────────────────────────────────────


@router.get("")
async def get_active_config():
    """Get the active profile's configuration."""
    cm = get_config()
    return {
        "active_profile": cm.active_profile,
        "config": cm.get_config_dict(),
    }


@router.put("")
async def update_active_config(body: ConfigUpdate):
    """Update the active profile's configuration."""
    cm = get_config()
    problems = cm.update_config(body.model_dump(exclude_none=True))
    if problems:
        raise HTTPException(status_code=400, detail={"problems": problems})
    return {
        "active_profile": cm.active_profile,
        "config": cm.get_config_dict(),
    }


# ── Profile management ───────────────────────────────────────────────


@router.get("/profiles")
async def list_profiles():
    """List all profile names and active profile."""
    cm = get_config()
    return {
        "active_profile": cm.active_profile,
        "profiles": cm.list_profiles(),
    }


@router.post("/profiles")
async def create_profile(body: ProfileCreate):
    """Create a new configuration profile."""
    cm = get_config()
    if not cm.create_profile(body.name, body.copy_from):
        raise HTTPException(
            status_code=409, detail=f"Profile '{body.name}' already exists"
        )
    return {"created": body.name, "profiles": cm.list_profiles()}


@router.delete("/profiles/{name}")
async def remove_profile(name: str):
    """Remove a profile; the last one left cannot be removed."""
    cm = get_config()
    if name not in cm.list_profiles():
        raise HTTPException(status_code=404, detail=f"Profile '{name}' not found")
    if not cm.delete_profile(name):
        raise HTTPException(status_code=409, detail=f"Profile '{name}' is the only profile left")
    return {"removed": name, "active_profile": cm.active_profile, "profiles": cm.list_profiles()}


@router.post("/profiles/{name}/activate")
async def activate_profile(name: str):
    """Switch the active profile."""
    cm = get_config()
    if not cm.switch_profile(name):
        raise HTTPException(status_code=404, detail=f"Profile '{name}' not found")
    cm = reset_config(cm.config_path)  # Reload singleton
    return {
        "active_profile": cm.active_profile,
        "config": cm.get_config_dict(),
    }
