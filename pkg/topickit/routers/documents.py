import logging
from typing import List

from fastapi import APIRouter, HTTPException

from topickit.core.errors import TopicKitError, http_status
from topickit.models.schemas import (
    CountVariantsRequest,
    CountVariantsResponse,
    Finding,
    RenderRequest,
    RenderResponse,
    ValidateRequest,
)
from topickit.services.matcher import fingerprint
from topickit.services.renderer import escape_for_store, render
from topickit.services.validator import validate
from topickit.services.variants import count_variants

logger = logging.getLogger(__name__)
router = APIRouter(prefix="/documents", tags=["documents"])


@router.post("/validate", response_model=List[Finding])
async def validate_regex(request: ValidateRequest):
    if (request.document is None) == (request.stored_regex is None):
        raise HTTPException(status_code=400, detail="Provide exactly one of document or stored_regex")
    try:
        target = request.document if request.document is not None else request.stored_regex
        return validate(target, request.banlist)
    except Exception as e:
        raise HTTPException(status_code=500, detail=f"Failed to validate regex: {str(e)}")


@router.post("/render", response_model=RenderResponse)
async def render_document(request: RenderRequest):
    try:
        live = render(request.document, request.options)
    except TopicKitError as e:
        raise HTTPException(status_code=http_status(e.code), detail=e.to_dict())
    except Exception as e:
        raise HTTPException(status_code=500, detail=f"Failed to render document: {str(e)}")
    return RenderResponse(live=live, stored=escape_for_store(live), fingerprint=fingerprint(live))


@router.post("/count-variants", response_model=CountVariantsResponse)
async def count_fragment_variants(request: CountVariantsRequest):
    try:
        return CountVariantsResponse(fragment=request.fragment, variants=count_variants(request.fragment))
    except TopicKitError as e:
        raise HTTPException(status_code=http_status(e.code), detail=e.to_dict())
