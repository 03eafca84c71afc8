# config/settings.py

import os
from pathlib import Path

from dotenv import load_dotenv

# Load environment variables from a .env file
load_dotenv()

PACKAGE_ROOT = Path(__file__).resolve().parent.parent
LOG_LEVELS = ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL")


class Config:
    """
    Environment-backed defaults for the resonance solver.

    Run parameters live in INI run configs; this class only carries the
    machine-level settings (where results go, how chatty, how parallel).
    """

    def __init__(self):
        self.OUTPUT_DIR = Path(os.getenv("RESONANCE_OUTPUT_DIR", "results"))
        self.LOG_LEVEL = os.getenv("RESONANCE_LOG_LEVEL", "INFO").upper()
        self.JOBS = int(os.getenv("RESONANCE_JOBS", 1))
        self.PRESET_DIR = Path(os.getenv("RESONANCE_PRESET_DIR", PACKAGE_ROOT / "config" / "presets"))

    def validate_required_config(self) -> dict[str, str]:
        """Status line per setting, in the style of a startup check"""
        return {
            "output_dir": f"✅ {self.OUTPUT_DIR}",
            "log_level": f"✅ {self.LOG_LEVEL}" if self.LOG_LEVEL in LOG_LEVELS else f"❌ unknown level {self.LOG_LEVEL}",
            "jobs": f"✅ {self.JOBS}" if self.JOBS >= 1 else f"❌ {self.JOBS} (must be >= 1)",
            "presets": f"✅ {self.PRESET_DIR}" if self.PRESET_DIR.is_dir() else f"⚠️ {self.PRESET_DIR} not found",
        }

    def preset_path(self, name: str) -> Path:
        return self.PRESET_DIR / f"{name}.ini"

    def available_presets(self) -> list[str]:
        if not self.PRESET_DIR.is_dir():
            return []
        return sorted(p.stem for p in self.PRESET_DIR.glob("*.ini"))


# This block allows you to run the file directly to check configuration
if __name__ == "__main__":
    config = Config()
    print("🔧 Resonance Solver Configuration Check")
    print("=" * 40)
    for setting, status in config.validate_required_config().items():
        print(f"{setting}: {status}")
    print(f"\n📂 Presets: {', '.join(config.available_presets()) or 'none'}")
