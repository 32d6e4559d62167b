"""HTTP service: one POST route per operation, plus /health."""

from fastapi import FastAPI
from fastapi.responses import JSONResponse

from . import __version__
from . import schemas as sc
from .errors import BetaDynError
from .operations import OPERATIONS, error_out, execute


app = FastAPI(title="betadyn", version=__version__)


@app.exception_handler(BetaDynError)
async def _domain_error(request, exc: BetaDynError):
    status = 503 if exc.exit_code == 2 else 422
    return JSONResponse(status_code=status, content=error_out(exc).model_dump())


@app.get("/health")
def health() -> dict:
    return {"status": "ok", "version": __version__}


def _route(command: str, model: type):
    def endpoint(request: model) -> sc.Result:  # type: ignore[valid-type]
        return OPERATIONS[command][1](request)

    endpoint.__name__ = "op_" + command.replace("-", "_")
    app.post(f"/{command}", response_model=sc.Result, name=command)(endpoint)


for _name, (_model, _) in OPERATIONS.items():
    _route(_name, _model)


__all__ = ["app", "execute", "OPERATIONS"]
