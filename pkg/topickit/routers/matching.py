import logging

from fastapi import APIRouter, HTTPException

from topickit.core.errors import TopicKitError, http_status
from topickit.models.schemas import ClassifyRequest, ClassifyResponse
from topickit.services import matcher

logger = logging.getLogger(__name__)
router = APIRouter(prefix="/matching", tags=["matching"])


@router.post("/classify", response_model=ClassifyResponse)
async def classify_texts(request: ClassifyRequest):
    try:
        compiled = matcher.compile(request.regex, request.customization)
    except TopicKitError as e:
        raise HTTPException(status_code=http_status(e.code), detail=e.to_dict())

    try:
        reports = [matcher.classify(compiled, text, early_exit=request.early_exit) for text in request.texts]
    except Exception as e:
        raise HTTPException(status_code=500, detail=f"Failed to classify texts: {str(e)}")
    logger.info(f"Classified {len(reports)} texts, {sum(r.matched for r in reports)} matched")
    return ClassifyResponse(fingerprint=compiled.source_fingerprint, reports=reports)
