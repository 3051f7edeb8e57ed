"""Robinson-Schensted insertion, Plancherel growth and the multi-line
Hammersley process, with exact and Monte Carlo checks of their Poisson
limits."""

from .tableau import (INF, DuplicateEntryError, RecordingTableau, Tableau, row_insert, rsk,
                      schensted_insert, truncated_insert, validate_diagram)
from .plancherel import (CapacityError, ExactMeasure, GrowthObservation, dimension,
                         exact_row_growth_prob, grow_rsk, partitions, plancherel_pmf,
                         s_table, sample_vbar, transition_probabilities, transition_step)
from .hammersley import (DualCorner, MultiLineState, ParticleConfiguration, SpaceTimePoint,
                         check_rsk_equivalence, hammersley_step, run_line, run_multiline)

__version__ = "0.1.0"
