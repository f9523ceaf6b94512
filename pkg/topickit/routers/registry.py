import logging
from typing import List, Optional

from fastapi import APIRouter, HTTPException

from topickit.core.errors import TopicKitError, http_status
from topickit.models.schemas import PublishRequest, PublishResponse, RegistryEntry, Tier
from topickit.services import registry_service

logger = logging.getLogger(__name__)
router = APIRouter(prefix="/registry", tags=["registry"])


@router.post("/publish", response_model=PublishResponse, status_code=201)
async def publish_document(request: PublishRequest):
    try:
        entry = registry_service.build_entry(request.document, annotated=request.annotated)
        version = registry_service.publish(entry)
        published = registry_service.fetch(entry.topic, entry.language, entry.tier, version)
    except TopicKitError as e:
        raise HTTPException(status_code=http_status(e.code), detail=e.to_dict())
    except Exception as e:
        raise HTTPException(status_code=500, detail=f"Failed to publish regex: {str(e)}")
    return PublishResponse(
        topic=published.topic,
        language=published.language,
        tier=published.tier,
        version=published.version,
        fingerprint=published.fingerprint,
    )


@router.get("/entries", response_model=List[RegistryEntry])
async def get_entries():
    try:
        return registry_service.list_entries()
    except TopicKitError as e:
        raise HTTPException(status_code=http_status(e.code), detail=e.to_dict())


@router.get("/{topic}/{language}/{tier}", response_model=RegistryEntry)
async def get_entry(topic: str, language: str, tier: Tier, version: Optional[int] = None):
    try:
        return registry_service.fetch(topic, language, tier, version)
    except TopicKitError as e:
        raise HTTPException(status_code=http_status(e.code), detail=e.to_dict())
    except Exception as e:
        raise HTTPException(status_code=500, detail=f"Failed to fetch regex: {str(e)}")
