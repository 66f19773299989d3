from fastapi import FastAPI, HTTPException
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import Response
import logging
from datetime import datetime

from analysis_service import analysis_service
from errors import ConfigError, QAError
from fixtures import AVAILABLE_FIXTURES
from report_writer import SCHEMA_VERSION, render
from run_config import RunConfig
from settings import settings

logging.basicConfig(level=getattr(logging, settings.log_level.upper(), logging.INFO))
logger = logging.getLogger(__name__)

app = FastAPI(title="Quasi-analyticity of Carleman classes", version="1.0.0")

app.add_middleware(
    CORSMiddleware,
    allow_origins=["*"],
    allow_credentials=True,
    allow_methods=["*"],
    allow_headers=["*"],
)


def _run(config: RunConfig, command: str) -> Response:
    """Run one command and return the same bytes the CLI would write."""
    try:
        report = analysis_service.run(config, command)
    except ConfigError as e:
        logger.error(f"{command}: config error ({e.field}): {e.message}")
        raise HTTPException(status_code=422, detail=e.to_dict())
    except QAError as e:
        logger.error(f"{command}: {type(e).__name__}: {e.message}")
        raise HTTPException(status_code=400, detail=e.to_dict())
    return Response(content=render(report, "json"), media_type="application/json")


@app.get("/health")
async def health_check():
    return {"status": "healthy", "schema": SCHEMA_VERSION, "timestamp": datetime.now().isoformat()}


@app.get("/fixtures")
async def list_fixtures():
    return {"fixtures": list(AVAILABLE_FIXTURES)}


@app.get("/settings")
async def current_settings():
    return settings.as_dict()


@app.post("/sequence")
def sequence(config: RunConfig):
    """Axiom reports, growth index and Ostrowski table for a weight sequence"""
    return _run(config, "sequence")


@app.post("/verdict")
def verdict(config: RunConfig):
    """Quasi-analyticity verdicts for a sequence on a polysector"""
    return _run(config, "verdict")


@app.post("/asymp")
def asymp(config: RunConfig):
    return _run(config, "asymp")


@app.post("/report")
def report(config: RunConfig):
    return _run(config, "report")
