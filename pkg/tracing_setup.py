"""
tracing_setup.py

Exports the workbench spans (countermodel searches, ordinal-model builds,
topology enumeration, selftest suites) to Azure Monitor. Without a
connection string the spans stay no-ops.
"""

import os
import sys
from typing import Optional

from dotenv import load_dotenv

# Load environment variables
load_dotenv()

from azure.monitor.opentelemetry import configure_azure_monitor

SERVICE_NAME = os.environ.get("OTEL_SERVICE_NAME", "glp-workbench")

# Global flag to ensure tracing is only set up once
_tracing_initialized = False
_exporting = False


def setup_tracing(connection_string: Optional[str] = None) -> bool:
    """
    Configure the Azure Monitor exporter once per process.

    Returns True when spans are exported.
    """
    global _tracing_initialized, _exporting

    if _tracing_initialized:
        print("✓ Tracing already initialized", file=sys.stderr)
        return _exporting

    connection_string = connection_string or os.getenv("APPLICATIONINSIGHTS_CONNECTION_STRING")
    if connection_string:
        os.environ.setdefault("OTEL_SERVICE_NAME", SERVICE_NAME)
        configure_azure_monitor(connection_string=connection_string)
        print(f"✓ Exporting {SERVICE_NAME} spans to Application Insights", file=sys.stderr)
        _exporting = True
    else:
        print("⚠ No Application Insights connection string found; spans are not exported", file=sys.stderr)

    _tracing_initialized = True
    return _exporting
