"""
From an interaction log to a feature row
========================================

A student's clicks become one row of 14 behavioural counts and times.
"""

import io

from edumine.ingest import SessionRule, aggregate_student, parse_events, write_event_log
from edumine.synth import scripted_events

# a fixed 12-event session, one event a minute
events = scripted_events("s0001")
buf = io.StringIO()
write_event_log(events, buf)
print(buf.getvalue())

# parse it back as if it came from disk
parsed = parse_events(buf.getvalue().splitlines())
print("malformed lines:", parsed.malformed_count)

row = aggregate_student(parsed.events)
for name, value in zip(row.__dataclass_fields__, row.as_tuple()):
    print(f"{name:>18} {value}")

# gaps are capped before being credited; a tighter cap shrinks every time field
tight = aggregate_student(parsed.events, SessionRule(max_gap=30))
print("Total_time with a 30 s cap:", tight.Total_time)
