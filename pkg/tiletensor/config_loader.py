from pathlib import Path
import yaml
from pydantic import ValidationError

from tiletensor.scene import LENGTH_SCALE, SceneError, TileSpec, format_validation_error
from tiletensor.settings import get_presets_path

_PRESET_META = ("name", "description", "units", "radians")


def load_presets(config_path=None):
    """Tile presets by name, converted to SI fields (meters, radians, A/m)."""
    path = Path(config_path) if config_path else get_presets_path()
    if not path.exists():
        return {}
    with path.open("r", encoding="utf-8") as handle:
        payload = yaml.safe_load(handle) or []
    presets = {}
    for index, entry in enumerate(payload):
        if not entry:
            continue
        name = str(entry.get("name", "")).strip()
        if not name:
            raise SceneError(f"{path}: preset {index} has no name")
        units = str(entry.get("units", "mm")).strip()
        if units not in LENGTH_SCALE:
            raise SceneError(f"{path}: preset {name!r} has unknown units {units!r}")
        fields = {key: value for key, value in entry.items() if key not in _PRESET_META}
        try:
            spec = TileSpec.model_validate(fields)
        except ValidationError as exc:
            raise SceneError(f"{path}: {format_validation_error(exc, prefix=name)}") from exc
        presets[name] = spec.to_si(units, bool(entry.get("radians", False)))
    return presets


def describe_presets(config_path=None):
    """Preset entries as written in the file, for listing."""
    path = Path(config_path) if config_path else get_presets_path()
    if not path.exists():
        return []
    with path.open("r", encoding="utf-8") as handle:
        payload = yaml.safe_load(handle) or []
    return [
        {
            "name": str(entry.get("name", "")).strip(),
            "description": str(entry.get("description", "")).strip(),
            "units": str(entry.get("units", "mm")).strip(),
        }
        for entry in payload
        if entry
    ]
