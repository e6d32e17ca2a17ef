from fastapi import FastAPI
from uvicorn import run

from src.conf.env import settings
from src.conf.log import setup_logging
from src.router.experiment import router as experiment_router

setup_logging()

app = FastAPI()

app.include_router(experiment_router)


if __name__ == "__main__":
    run(app, host=settings.API_HOST, port=settings.API_PORT)
