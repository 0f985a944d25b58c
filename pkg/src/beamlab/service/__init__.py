"""HTTP surface: pydantic schemas and the FastAPI app factory."""
