from .TraceRepository import TraceRepository, TraceWriter, TRACE_COLUMNS, RATE_COLUMNS, read_trace

__all__ = ['TraceRepository', 'TraceWriter', 'TRACE_COLUMNS', 'RATE_COLUMNS', 'read_trace']
