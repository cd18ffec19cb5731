import sys
from pathlib import Path

from hypothesis import HealthCheck, settings

# lets test modules import the shared hypothesis strategies
sys.path.insert(0, str(Path(__file__).parent))

settings.register_profile("default", deadline=None, max_examples=40,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")
