"""Human review loop: event-sourced case store and its HTTP service."""

from .store import ReviewStore, init_store
from .service import create_app, serve

__all__ = ["ReviewStore", "init_store", "create_app", "serve"]
