"""Virtual 7-servo arm: gesture pose tables, PWM encoding, slewed motion.

Servo order: 0 thumb, 1 index, 2 middle, 3 ring, 4 pinky, 5 wrist,
6 elbow. All four gestures are hand-only, so wrist and elbow stay at
neutral 90 degrees. Motion is rate-limited per joint; every commanded
target appends its 7 PWM commands to the log.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .gestures import Gesture
from .rng import round_half_away

N_SERVOS = 7
PWM_MIN_US = 500
PWM_MAX_US = 2500
PWM_PERIOD_US = 20000  # 50 Hz
DEFAULT_SLEW_DEG_S = 300.0

GESTURE_POSES: dict[Gesture, tuple[float, ...]] = {
    Gesture.FIST: (180, 180, 180, 180, 180, 90, 90),
    Gesture.OPEN_HAND: (0, 0, 0, 0, 0, 90, 90),
    Gesture.THUMBS_UP: (0, 180, 180, 180, 180, 90, 90),
    Gesture.REST: (90, 90, 90, 90, 90, 90, 90),
}


def gesture_pose(g: Gesture) -> tuple[float, ...]:
    return GESTURE_POSES[g]


@dataclass(frozen=True)
class PwmCommand:
    channel: int
    pulse_us: int
    period_us: int = PWM_PERIOD_US

    def __post_init__(self):
        if not 0 <= self.channel < N_SERVOS:
            raise ValueError(f"channel {self.channel} out of range")
        if not PWM_MIN_US <= self.pulse_us <= PWM_MAX_US:
            raise ValueError(f"pulse {self.pulse_us} outside "
                             f"[{PWM_MIN_US}, {PWM_MAX_US}]")


def angle_to_pulse(angle_deg: float) -> int:
    """Linear map 0..180 deg onto 500..2500 us."""
    if not 0.0 <= angle_deg <= 180.0:
        raise ValueError(f"angle {angle_deg} outside [0, 180]")
    return PWM_MIN_US + round_half_away(angle_deg / 180.0 * 2000.0)


def pulse_to_angle(pulse_us: int) -> float:
    return (pulse_us - PWM_MIN_US) * 180.0 / 2000.0


def pose_to_pwm(pose) -> list[PwmCommand]:
    if len(pose) != N_SERVOS:
        raise ValueError(f"expected {N_SERVOS} angles")
    return [PwmCommand(channel=i, pulse_us=angle_to_pulse(a))
            for i, a in enumerate(pose)]


@dataclass
class VirtualArm:
    """Rate-limited servo simulation with an append-only command log."""

    slew_deg_s: float = DEFAULT_SLEW_DEG_S
    current: list[float] = field(
        default_factory=lambda: list(GESTURE_POSES[Gesture.REST]))
    target: list[float] = field(
        default_factory=lambda: list(GESTURE_POSES[Gesture.REST]))
    t_us: int = 0
    command_log: list[tuple[int, PwmCommand]] = field(default_factory=list)

    def set_target(self, g: Gesture) -> None:
        """Command a gesture pose; logs the 7 PWM commands at current time."""
        pose = gesture_pose(g)
        self.target = list(pose)
        for cmd in pose_to_pwm(pose):
            self.command_log.append((self.t_us, cmd))

    def step(self, dt_us: int) -> None:
        """Advance the simulation; each joint moves at most slew * dt."""
        if dt_us <= 0:
            raise ValueError("dt_us must be positive")
        max_step = self.slew_deg_s * (dt_us / 1_000_000.0)
        for i in range(N_SERVOS):
            delta = self.target[i] - self.current[i]
            if delta > max_step:
                delta = max_step
            elif delta < -max_step:
                delta = -max_step
            self.current[i] += delta
        self.t_us += dt_us

    def settled(self, tolerance_deg: float = 1.0) -> bool:
        return all(abs(c - t) <= tolerance_deg
                   for c, t in zip(self.current, self.target))

    def pose_payload(self) -> dict:
        return {"type": "pose", "angles": list(self.current), "t_us": self.t_us}

    def command_log_csv(self) -> str:
        lines = ["t_us,channel,pulse_us"]
        for t_us, cmd in self.command_log:
            lines.append(f"{t_us},{cmd.channel},{cmd.pulse_us}")
        return "\n".join(lines) + "\n"
