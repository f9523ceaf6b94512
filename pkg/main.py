import uvicorn

from topickit.core.config import API_HOST, API_PORT, LOG_LEVEL


def serve() -> None:
    uvicorn.run("topickit.main:app", host=API_HOST, port=API_PORT, log_level=LOG_LEVEL.lower())


if __name__ == "__main__":
    serve()
