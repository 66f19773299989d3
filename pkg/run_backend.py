#!/usr/bin/env python3
"""
Startup script for the quasi-analyticity API
"""

import uvicorn

from settings import settings

if __name__ == "__main__":
    print("Starting quasi-analyticity backend...")
    print("=" * 50)
    print(f"Default index range P: {settings.default_p}")
    print(f"Growth index budget a_max: {settings.default_a_max}")
    print(f"Starting server on http://{settings.host}:{settings.port}")
    print(f"API Documentation: http://{settings.host}:{settings.port}/docs")
    print("=" * 50)

    uvicorn.run(
        "api_main:app",
        host=settings.host,
        port=settings.port,
        reload=True,
        log_level=settings.log_level.lower(),
    )
