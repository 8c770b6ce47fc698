import functools
import logging
from typing import Any, Callable

from compatpie.config import trace_enabled

logger = logging.getLogger("compatpie.trace")


class Trace:
    level: int = 0

    def __init__(self, wrapped: Callable):
        self._wrapped = wrapped
        functools.update_wrapper(self, wrapped)
        if trace_enabled():
            self._action = self._trace_action
        else:
            self._action = self._wrapped

    def __get__(self, instance, owner):
        if instance is None:
            return self
        return functools.partial(self.__call__, instance)

    def __call__(self, *args, **kwargs) -> Any:
        return self._action(*args, **kwargs)

    def _trace_action(self, *args, **kwargs) -> Any:
        Trace.level += 1
        indent = "\t" * (Trace.level - 1)
        logger.debug("%sBEGIN: %s %s %s", indent, self._wrapped.__name__, args, kwargs)
        try:
            return self._wrapped(*args, **kwargs)
        finally:
            logger.debug("%sEND: %s", indent, self._wrapped.__name__)
            Trace.level -= 1
