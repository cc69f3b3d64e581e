"""Transient detection and SVD-based spike/oscillation separation for
multichannel electrophysiology.

Submodules
----------
sigio      recordings, event lists and run configuration on disk
simgen     simulated transient + gamma + 1/f noise benchmark
detector   quantile-threshold peak detection and epoch extraction
svdsep     rank-K temporal basis and transient reconstruction
metrics    goodness of fit, SNR, event matching, precision
cluster    peak alignment and k-means on epochs
topomap    sensor-map interpolation and dipolarity score
bench      parallel windowed-SVD throughput harness
pipeline   simulate -> detect -> despike -> evaluate
"""

from .sigio import (ChannelMeta, EventList, Recording, RunConfig, ValidationError,
                    read_events, read_recording, write_events, write_recording)
from .detector import (EpochMatrix, PeakSet, ThresholdPair, detect_all, detect_peaks,
                       extract_epochs, quantile_thresholds)
from .svdsep import (SeparationResult, SvdBasis, TransientModel, build_model, compute_svd,
                     despike, project_epoch)
from .metrics import (DetectionScore, GofResult, NoDetectionsError, gof, match_events,
                      measure_snr_db, precision, score_detection)
from .simgen import (GroundTruth, SimSpec, gen_burst, gen_pink_noise, gen_transient,
                     dipole_pattern, ring_layout, scale_to_snr, simulate, simulate_dipolar)
from .cluster import ClusterResult, align_epochs, kmeans, sort_order
from .topomap import DipolarityScore, TopoMap, dipolarity, interpolate
from .bench import BenchReport, run_bench
from .pipeline import SessionResult, concat_recordings, gof_table, run_session

__version__ = "0.1.0"
