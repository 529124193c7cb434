import os
import sys

os.environ["PYTHONIOENCODING"] = "utf-8"

import logging

import typer
from dotenv import load_dotenv

if os.getenv("ENV") != "production":
    load_dotenv(override=True)

import config
from cli import add_commands_to_app

# 로그 설정 (stderr로 출력)
logging.basicConfig(
    level=getattr(logging, config.LOG_LEVEL.upper(), logging.WARNING),
    format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
    stream=sys.stderr,
)

app = typer.Typer(
    name="holonomy",
    help="Exact decomposition of form-preserving representations into indecomposable summands.",
    no_args_is_help=True,
)

# 명령 등록
add_commands_to_app(app)


if __name__ == "__main__":
    app()
