"""nocforge: floorplan-aware NoC topology synthesis, cost prediction, exploration.

The pipeline runs build -> ports -> global route -> spacings -> cell grid ->
detailed route -> cost -> performance; ``nocforge.explore.evaluate`` wires the
stages together for one candidate and the CLI exposes the whole thing.
"""

__version__ = "0.1.0"
