from fastapi import FastAPI, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
import socketio

from app.core.config import settings
from app.core.exceptions import ConfigurationError, SafeError, StreamPoisonedError
from app.core.logging import configure_logging
from app.core.socketio_manager import sio
from app.database import init_db
from app.routers import detect, runs, series

configure_logging()

# Create registry tables
init_db()

# Create FastAPI application
fastapi_app = FastAPI(
    title=settings.APP_NAME,
    description="Online non-stationarity detection and adaptive prediction API",
    version="1.0.0",
    docs_url="/docs",
    redoc_url="/redoc",
)

# Configure CORS
fastapi_app.add_middleware(
    CORSMiddleware,
    allow_origins=settings.CORS_ORIGINS,
    allow_credentials=True,
    allow_methods=["*"],
    allow_headers=["*"],
)

# Include routers
fastapi_app.include_router(series.router)
fastapi_app.include_router(detect.router)
fastapi_app.include_router(runs.router)


@fastapi_app.exception_handler(SafeError)
async def safe_error_handler(request: Request, exc: SafeError):
    """Translate toolkit errors that escaped a router."""
    if isinstance(exc, StreamPoisonedError):
        code = 409
    elif isinstance(exc, ConfigurationError):
        code = 422
    else:
        code = 500
    return JSONResponse(status_code=code, content={"detail": str(exc)})


@fastapi_app.get("/", tags=["Health"])
async def root():
    """Health check endpoint."""
    return {
        "status": "healthy",
        "message": f"Welcome to {settings.APP_NAME}",
        "docs": "/docs",
        "socket_io": "/socket.io"
    }


@fastapi_app.get("/health", tags=["Health"])
async def health_check():
    """Detailed health check endpoint."""
    return {
        "status": "healthy",
        "app_name": settings.APP_NAME,
        "debug": settings.DEBUG,
        "database": settings.DATABASE_URL.split(":", 1)[0],
    }

# Wrap FastAPI app with Socket.IO
app = socketio.ASGIApp(sio, other_asgi_app=fastapi_app)
