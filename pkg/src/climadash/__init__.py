"""climadash: model-driven city KPI dashboards.

A textual modeling DSL plus a deterministic code generator produce a
persistence schema, an API description, and a default dashboard; a runtime
service ingests timestamped records, evaluates KPI expressions over time
windows, and serves a dashboard editor driven by drag-and-drop and a
deterministic natural-language agent with BM25 retrieval.
"""

__version__ = "0.1.0"
