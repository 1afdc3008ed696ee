"""
Gammoid Decider - FastAPI Application
HTTP entry point exposing the decision procedure and its certificate tests.
"""

import time
from contextlib import asynccontextmanager

from fastapi import FastAPI, Request

from app.core.config import settings
from app.core.logging import get_logger, log_request, setup_logging
from app.infrastructure.cache import certificate_cache

logger = get_logger(__name__)


@asynccontextmanager
async def lifespan(app: FastAPI):
    """
    Application lifespan manager.
    Handles startup and shutdown events.
    """
    # Startup
    setup_logging()
    logger.info("Gammoid Decider started", environment=settings.ENVIRONMENT)
    yield
    # Shutdown
    certificate_cache.clear()


def create_app() -> FastAPI:
    """
    Create and configure the FastAPI application.

    Returns:
        FastAPI: Configured FastAPI application instance
    """
    app = FastAPI(
        title=settings.APP_NAME,
        description="Decide whether a finite matroid is a gammoid",
        version="1.0.0",
        docs_url="/docs" if settings.ENVIRONMENT != "production" else None,
        redoc_url="/redoc" if settings.ENVIRONMENT != "production" else None,
        openapi_url="/openapi.json" if settings.ENVIRONMENT != "production" else None,
        lifespan=lifespan,
    )

    @app.middleware("http")
    async def request_logging(request: Request, call_next):
        started = time.perf_counter()
        response = await call_next(request)
        log_request(request.method, request.url.path, response.status_code, round(time.perf_counter() - started, 4))
        return response

    from app.api.routers import decision_router

    app.include_router(
        decision_router.router, prefix="/api/v1/matroid", tags=["Gammoid Decision"]
    )

    @app.get("/health")
    async def health_check():
        """Health check endpoint."""
        return {
            "status": "healthy",
            "environment": settings.ENVIRONMENT,
            "caps": {
                "max_ground_size": settings.MAX_GROUND_SIZE,
                "max_canonical_size": settings.MAX_CANONICAL_SIZE,
                "max_extension_size": settings.MAX_EXTENSION_SIZE,
            },
        }

    return app


# Create the FastAPI app instance
app = create_app()


if __name__ == "__main__":
    import uvicorn

    uvicorn.run(
        "app.main:app",
        host=settings.HOST,
        port=settings.PORT,
        reload=settings.ENVIRONMENT == "development",
        log_level="info",
    )
