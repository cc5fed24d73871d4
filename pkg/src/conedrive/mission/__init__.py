"""Per-tick pipeline orchestration, CLI, corpus tooling and live telemetry."""

from conedrive.mission.pipeline import Mission, TelemetryFrame

__all__ = ["Mission", "TelemetryFrame"]
