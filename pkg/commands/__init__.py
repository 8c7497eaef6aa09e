# Commands module initialization
from commands.field_map import cmd_field_map
from commands.optimize import cmd_optimize
from commands.oracle_compare import cmd_oracle_compare
from commands.pulse_sim import cmd_pulse_sim
from commands.ts_map import cmd_ts_map
from commands.verify import cmd_verify

COMMANDS = {
    'field-map': cmd_field_map,
    'optimize': cmd_optimize,
    'ts-map': cmd_ts_map,
    'oracle-compare': cmd_oracle_compare,
    'pulse-sim': cmd_pulse_sim,
    'verify': cmd_verify,
}
