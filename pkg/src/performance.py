"""Timing and memory instrumentation for the expensive pipeline stages."""
import logging
import os
import time
from functools import wraps
from typing import Any, Callable

import psutil


def measure_performance(func: Callable) -> Callable:
    """Decorator logging wall time and resident-memory change of each call.

    Args:
        func: The function to measure

    Returns:
        Wrapped function; the result is passed through untouched
    """
    @wraps(func)
    def wrapper(*args, **kwargs) -> Any:
        logger = logging.getLogger(func.__module__)
        process = psutil.Process(os.getpid())
        rss_before = process.memory_info().rss / 1024 / 1024  # MB
        start = time.perf_counter()
        try:
            return func(*args, **kwargs)
        finally:
            elapsed = time.perf_counter() - start
            rss_after = process.memory_info().rss / 1024 / 1024  # MB
            logger.info(f"{func.__name__} took {elapsed:.3f} s "
                        f"(rss {rss_after:.1f} MB, {rss_after - rss_before:+.1f} MB)")

    return wrapper
