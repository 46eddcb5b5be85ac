from .csvdata import apply_mapping, ingest_csv
from .config import ServiceConfig
from .sessions import Session, SessionStore
