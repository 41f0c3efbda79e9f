"""Deterministic in-vehicle ECM/IVIS simulator.

A virtual electronic control module (service reminders, display settings,
diagnostic trouble codes, a 2x20 LCD) driven through two interchangeable
interaction models: conventional instrument-panel procedures and direct
reference-code entry on the radio keypad.  A session harness measures
time-to-complete, error counts, and survey satisfaction for either model.
"""

__version__ = "0.1.0"
