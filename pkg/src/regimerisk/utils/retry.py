"""
regimerisk.utils.retry
~~~~~~~~~~~~~~~~~~~~~~
This module provides a decorator for retrying a function call if it raises an exception.

Functions:
    - retry: Retry a function call if it raises one of the given exceptions.
"""
import functools
import logging
import time
from typing import Callable, Tuple, Type

logger = logging.getLogger(__name__)


def retry(attempts: int, delay: float = 0.0, exceptions: Tuple[Type[BaseException], ...] = (Exception,),
          pass_attempt: bool = False):
    """
    Retry a function call if it raises an exception.

    Args:
        attempts (int): Number of attempts, first call included.
        delay (float): Delay in seconds between attempts.
        exceptions (tuple): Exception types that trigger a retry; anything else propagates at once.
        pass_attempt (bool): Pass the 0-based attempt number as the `attempt` keyword so the
            wrapped function can perturb its starting point.

    Returns:
        Callable: A decorator that retries the function.
    """
    if attempts < 1:
        raise ValueError("attempts must be at least 1")

    def decorator(func: Callable):
        @functools.wraps(func)
        def wrapper(*args, **kwargs):
            last_exception = None
            for attempt in range(attempts):
                if pass_attempt:
                    kwargs["attempt"] = attempt
                try:
                    return func(*args, **kwargs)
                except exceptions as e:
                    last_exception = e
                    logger.warning("%s failed on attempt %d/%d: %s", func.__name__, attempt + 1, attempts, e)
                    if delay > 0:
                        time.sleep(delay)
            raise last_exception
        return wrapper
    return decorator
