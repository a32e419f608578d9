from .calendar import COMPILED, Event, EventCalendar
from .engine import LivelockError, SchedulingError, Simulation, run_replication
from .results import BUCKET_LABELS, BUCKETS, ReplicationResult, SurgeryRecord, TripRecord, bucket_of
from .rng import RngStream, make_stream

__all__ = [
    "COMPILED", "Event", "EventCalendar", "LivelockError", "SchedulingError", "Simulation",
    "run_replication", "BUCKET_LABELS", "BUCKETS", "ReplicationResult", "SurgeryRecord",
    "TripRecord", "bucket_of", "RngStream", "make_stream",
]
