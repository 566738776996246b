"""
Utility decorators shared across the toolkit.
"""

import functools
import inspect
import logging
from typing import Callable

from bbfiber.exceptions import BBFiberError

logger = logging.getLogger(__name__)


def handle_numeric_errors(func: Callable) -> Callable:
    """
    Decorator to surface numerical failures as toolkit errors.

    Usage:
        @handle_numeric_errors
        def gamma_quadrature(...):
            ...
    """

    @functools.wraps(func)
    def wrapper(*args, **kwargs):
        try:
            return func(*args, **kwargs)
        except BBFiberError:
            raise
        except (ArithmeticError, ValueError, TypeError, RuntimeError) as e:
            logger.debug("Wrapping %s raised in %s", type(e).__name__, func.__name__)
            raise BBFiberError(f"Error in {func.__name__}: {str(e)}") from e

    return wrapper


def validate_input_types(**type_map: type):
    """
    Decorator to validate function argument types.

    Args:
        type_map: Dictionary mapping parameter names to expected types

    Usage:
        @validate_input_types(max_steps=int)
        def search_sequences(targets, alphabet, max_steps):
            ...
    """

    def decorator(func: Callable) -> Callable:
        sig = inspect.signature(func)

        @functools.wraps(func)
        def wrapper(*args, **kwargs):
            bound_args = sig.bind(*args, **kwargs)
            bound_args.apply_defaults()

            for param_name, expected_type in type_map.items():
                if param_name in bound_args.arguments:
                    value = bound_args.arguments[param_name]
                    # bool is an int subclass but never a valid count
                    if value is not None and (
                        not isinstance(value, expected_type)
                        or (expected_type is int and isinstance(value, bool))
                    ):
                        raise TypeError(
                            f"{param_name} must be {expected_type.__name__}, "
                            f"got {type(value).__name__}"
                        )

            return func(*args, **kwargs)

        return wrapper

    return decorator
