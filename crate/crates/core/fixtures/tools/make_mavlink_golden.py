"""Captures SET_POSITION_TARGET_LOCAL_NED v1 frames from pymavlink.

Output columns: seq sysid compid time_boot_ms target_system target_component vx vy vz hex
"""
import sys

from pymavlink.dialects.v10 import common as mav

CASES = [
    (0, 0, 0, 0, 0, 0, 0.0, 0.0, 0.0),
    (7, 1, 191, 1234, 1, 1, 0.4, -0.8, -0.5),
    (255, 1, 191, 4294967295, 1, 1, -0.4, 0.8, 0.5),
    (42, 255, 1, 60000, 2, 3, 0.3, 0.3, -0.2),
    (128, 1, 191, 250, 1, 0, 1.0e-3, -12.5, 3.25),
]


def frame(seq, sysid, compid, t, ts, tc, vx, vy, vz):
    link = mav.MAVLink(None, srcSystem=sysid, srcComponent=compid)
    link.seq = seq
    msg = mav.MAVLink_set_position_target_local_ned_message(
        t, ts, tc, 9, 0x0DC7, 0, 0, 0, vx, vy, vz, 0, 0, 0, 0, 0
    )
    return msg.pack(link).hex()


def main(out):
    for c in CASES:
        out.write(" ".join(repr(v) for v in c) + " " + frame(*c) + "\n")


if __name__ == "__main__":
    main(sys.stdout)
