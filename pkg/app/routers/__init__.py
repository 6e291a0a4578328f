from app.routers import detect, runs, series

__all__ = ["detect", "runs", "series"]
