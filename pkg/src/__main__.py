# Allow running as module: python -m src
from src.orchestrator.main import app

if __name__ == "__main__":
    app()
