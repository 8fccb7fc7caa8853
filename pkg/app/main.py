"""Main FastAPI application"""
from fastapi import FastAPI
from fastapi.middleware.cors import CORSMiddleware

from app.core.config import APP_TITLE, APP_DESCRIPTION, APP_VERSION
from app.core.logging import configure_logging
from app.api.routers import audit, coloring, experiments, partition, prague
from app.harness.jobs import scheduler

app = FastAPI(
    title=APP_TITLE,
    description=APP_DESCRIPTION,
    version=APP_VERSION,
)

# CORS middleware
app.add_middleware(
    CORSMiddleware,
    allow_origins=["*"],
    allow_credentials=True,
    allow_methods=["*"],
    allow_headers=["*"],
)

# Include routers
app.include_router(partition.router)
app.include_router(coloring.router)
app.include_router(audit.router)
app.include_router(prague.router)
app.include_router(experiments.router)


@app.on_event("startup")
def start_scheduler():
    """Start the experiment scheduler on application startup"""
    configure_logging()
    if not scheduler.running:
        scheduler.start()


@app.on_event("shutdown")
def stop_scheduler():
    """Stop the experiment scheduler on application shutdown"""
    if scheduler.running:
        scheduler.shutdown(wait=False)


@app.get("/")
def root():
    """Root endpoint"""
    return {
        "message": "Prague Dimension Lab API",
        "version": APP_VERSION,
        "docs": "/docs"
    }


@app.get("/health")
def health_check():
    """Health check endpoint"""
    return {"status": "healthy"}
