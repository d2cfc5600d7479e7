"""
HTTP endpoints of the Query Store service.

Registered as FastMCP custom routes, so they are served by the same Starlette
application as the MCP streamable-HTTP transport.
"""

import logging
from typing import Dict, Type

from starlette.concurrency import run_in_threadpool
from starlette.requests import Request
from starlette.responses import HTMLResponse, JSONResponse, Response

from . import store_manager
from .errors import (
    ConfigurationError,
    DatasetError,
    InvalidDocument,
    MissingRequiredField,
    NodeUnavailable,
    NotReexecutable,
    QuerySyntax,
    StorageFailure,
    TypeMismatch,
    UnknownIdentifier,
    UnknownOriginKind,
    XmlSyntax,
    XsamsError,
)
from .landing import render_not_found
from .mcp_instance import mcp
from .xml_io import parse, serialize

logger = logging.getLogger(__name__)

XML_MEDIA_TYPE = "application/xml"

STATUS_CODES: Dict[Type[XsamsError], int] = {
    XmlSyntax: 400,
    QuerySyntax: 400,
    TypeMismatch: 400,
    UnknownOriginKind: 422,
    MissingRequiredField: 422,
    InvalidDocument: 422,
    UnknownIdentifier: 404,
    NotReexecutable: 409,
    NodeUnavailable: 503,
    ConfigurationError: 503,
    StorageFailure: 500,
    DatasetError: 500,
}


def status_for(error: XsamsError) -> int:
    for cls in type(error).__mro__:
        if cls in STATUS_CODES:
            return STATUS_CODES[cls]
    return 400


def error_response(error: XsamsError) -> JSONResponse:
    return JSONResponse(error.to_payload(), status_code=status_for(error))


@mcp.custom_route("/health", methods=["GET"])
async def health(request: Request) -> Response:
    config = store_manager.get_config()
    store = await run_in_threadpool(store_manager.get_store)
    return JSONResponse(
        {
            "status": "ok",
            "records": len(store),
            "serves_node": config.serves_node,
            "auto_register": config.node_auto_register,
        }
    )


@mcp.custom_route("/register", methods=["POST"])
async def register(request: Request) -> Response:
    body = await request.body()

    def work():
        doc, _ = parse(body)
        return store_manager.get_store().register(doc, raw=body)

    try:
        record = await run_in_threadpool(work)
    except XsamsError as e:
        logger.error(f"Error in register: {e}")
        return error_response(e)
    return JSONResponse(record.model_dump(mode="json"))


@mcp.custom_route("/resolve/{identifier}", methods=["GET"])
async def resolve(request: Request) -> Response:
    identifier = request.path_params["identifier"]
    store = await run_in_threadpool(store_manager.get_store)
    try:
        if request.query_params.get("format", "").lower() == "xsams":
            content = await run_in_threadpool(store.document_bytes, identifier)
            return Response(content, media_type=XML_MEDIA_TYPE)
        return JSONResponse(store.landing_record(identifier))
    except XsamsError as e:
        return error_response(e)


@mcp.custom_route("/landing/{identifier}", methods=["GET"])
async def landing(request: Request) -> Response:
    identifier = request.path_params["identifier"]
    store = await run_in_threadpool(store_manager.get_store)
    try:
        page = store.landing_page(identifier)
    except UnknownIdentifier:
        return HTMLResponse(render_not_found(identifier), status_code=404)
    return HTMLResponse(page)


@mcp.custom_route("/reexecute/{identifier}", methods=["GET"])
async def reexecute(request: Request) -> Response:
    identifier = request.path_params["identifier"]

    def work():
        fresh, match = store_manager.get_store().reexecute(identifier)
        return serialize(fresh), match

    try:
        content, match = await run_in_threadpool(work)
    except XsamsError as e:
        logger.error(f"Error in reexecute: {e}")
        return error_response(e)
    return Response(
        content,
        media_type=XML_MEDIA_TYPE,
        headers={"X-Digest-Match": "true" if match else "false"},
    )


@mcp.custom_route("/tap/sync", methods=["GET"])
async def tap_sync(request: Request) -> Response:
    params = request.query_params
    if params.get("REQUEST", "doQuery") != "doQuery" or params.get("FORMAT", "XSAMS").upper() != "XSAMS":
        return JSONResponse(
            {"error": "UnsupportedRequest", "detail": "only REQUEST=doQuery&FORMAT=XSAMS is served"},
            status_code=400,
        )
    query = params.get("QUERY")
    if not query:
        return JSONResponse({"error": "MissingQuery", "detail": "QUERY parameter is required"}, status_code=400)

    def work():
        doc = store_manager.get_node().execute(query)
        content = serialize(doc)
        headers = {}
        if store_manager.get_config().node_auto_register:
            record = store_manager.get_store().register(doc, raw=content)
            headers["X-Query-Store-Id"] = record.identifier
        return content, headers

    try:
        content, headers = await run_in_threadpool(work)
    except XsamsError as e:
        logger.error(f"Error in tap_sync: {e}")
        return error_response(e)
    return Response(content, media_type=XML_MEDIA_TYPE, headers=headers)
