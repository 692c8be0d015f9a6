"""FastAPI service exposing the laboratory as request/response endpoints."""
