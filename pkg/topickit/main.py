import logging

from fastapi import FastAPI
from fastapi.middleware.cors import CORSMiddleware

from topickit import __version__
from topickit.core.config import LOG_LEVEL, get_registry_path
from topickit.routers import documents, matching, registry

logger = logging.getLogger(__name__)

app = FastAPI(
    title="TopicKit API",
    description="Authoring, validation, matching and distribution of human-readable topic regexes",
    version=__version__,
)

app.add_middleware(
    CORSMiddleware,
    allow_origins=["*"],
    allow_credentials=True,
    allow_methods=["*"],
    allow_headers=["*"],
)


@app.on_event("startup")
async def startup_event():
    logging.basicConfig(level=LOG_LEVEL)
    logger.info(f"Serving registry at {get_registry_path()}")


app.include_router(documents.router)
app.include_router(matching.router)
app.include_router(registry.router)


@app.get("/")
async def root():
    return {
        "message": "TopicKit API - Topic Regex Toolkit",
        "version": __version__,
        "endpoints": {
            "documents": "/documents",
            "matching": "/matching",
            "registry": "/registry",
        },
    }
