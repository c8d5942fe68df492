"""Synthetic channel-database documents.

The facilities' real inventories are private, so every database used by the
tests and the CLI is produced here as a plain config document (the same shape
``load_database`` reads). Counts follow the published figures: a tutorial
database of 1,050 channels over four systems, vacuum gauge controllers of
145-152 channels, a flat FEL-style dictionary of roughly 300 channels built
from 58 templates.
"""
from __future__ import annotations

import random
from typing import Any

SIX_LEVELS = [
    {"name": "system"},
    {"name": "subsystem"},
    {"name": "device"},
    {"name": "subdevice", "optional": True},
    {"name": "signal", "optional": True},
    {"name": "suffix", "optional": True},
]
SIX_PATTERN = "{system}-{subsystem}:{device}:{subdevice}:{signal}.{suffix}"
SUFFIXES = {"SP": "Setpoint", "RB": "Readback", "CMD": "Command"}

_SUFFIX_NODES = {
    "SP": {"level": "suffix", "value": "SP", "description": "setpoint, set or write the demanded value"},
    "RB": {"level": "suffix", "value": "RB", "description": "readback, read or check the measured actual value"},
    "CMD": {"level": "suffix", "value": "CMD", "description": "command, trigger or execute an action"},
}


def signal(value: str, description: str, *suffixes: str) -> dict[str, Any]:
    node: dict[str, Any] = {"level": "signal", "value": value, "description": description}
    if suffixes:
        node["children"] = [dict(_SUFFIX_NODES[s]) for s in suffixes]
    return node


def _range(prefix: str, n: int, pad: int, lo: int = 1) -> dict[str, Any]:
    return {"range": {"prefix": prefix, "lo": lo, "hi": lo + n - 1, "pad": pad}}


# -- vacuum gauge controller ------------------------------------------------

ION_GAUGE_SIGNALS = [
    signal("PRES", "ionization pressure reading", "RB"),
    signal("EMIS", "emission current", "SP", "RB"),
    signal("DEGAS", "degas cycle", "CMD", "RB"),
    signal("FIL", "filament selection", "SP", "RB"),
    signal("HV", "high voltage enable", "CMD", "RB"),
]  # 9 channels
THERMAL_GAUGE_SIGNALS = [
    signal("PRES", "thermal conductivity pressure reading", "RB"),
    signal("TEMP", "sensor temperature", "RB"),
    signal("OFFS", "zero offset calibration", "SP", "RB"),
    signal("GAS", "gas type correction", "SP", "RB"),
    signal("ZERO", "auto zero", "CMD"),
    signal("STAT", "thermal gauge status word"),
]  # 8 channels
RELAY_SIGNALS = [
    signal("THR", "setpoint trip threshold", "SP", "RB"),
    signal("HYS", "hysteresis band", "SP", "RB"),
    signal("SRC", "source gauge assignment", "SP", "RB"),
    signal("STATE", "relay state"),
    signal("ENA", "relay enable", "CMD", "RB"),
]  # 9 channels
PUMP_CHANNEL_SIGNALS = [
    signal("VOLT", "pump high voltage", "SP", "RB"),
    signal("CURR", "pump current draw", "RB"),
    signal("PRES", "pressure derived from pump current", "RB"),
    signal("HV", "pump supply switch", "CMD", "RB"),
]  # 6 channels
CONTROLLER_SIGNALS = [
    signal("FWVER", "firmware version"),
    signal("SERIAL", "serial number"),
    signal("UNIT", "pressure unit selection", "SP", "RB"),
    signal("RESET", "controller reset", "CMD"),
    signal("STAT", "controller status summary"),
]  # 6 channels


def vacuum_device_children(ion_gauges: int = 4, thermal_gauges: int = 0) -> list[dict[str, Any]]:
    """Signals and subdevices of one vacuum gauge controller.

    4 gauge heads (ion or thermal), 8 pressure setpoint relays and 6 pump
    channels: 146 channels with four thermal heads up to 150 with four ion
    heads.
    """
    children = [dict(s) for s in CONTROLLER_SIGNALS]
    if ion_gauges:
        children.append({
            "level": "subdevice", "description": "ion gauge head {value} vacuum pressure",
            "expand": _range("IG", ion_gauges, 1), "children": ION_GAUGE_SIGNALS,
        })
    if thermal_gauges:
        children.append({
            "level": "subdevice", "description": "thermal gauge head {value}",
            "expand": {"list": [f"TG{ion_gauges + i + 1}" for i in range(thermal_gauges)]},
            "children": THERMAL_GAUGE_SIGNALS,
        })
    children.append({
        "level": "subdevice", "description": "pressure setpoint relay {value}",
        "expand": _range("SPR", 8, 1), "children": RELAY_SIGNALS,
    })
    children.append({
        "level": "subdevice", "description": "ion pump channel {value}",
        "expand": _range("PC", 6, 1), "children": PUMP_CHANNEL_SIGNALS,
    })
    return children


def vacuum_device_config(ion_gauges: int = 4, thermal_gauges: int = 0) -> dict[str, Any]:
    """A database holding exactly one vacuum gauge controller."""
    return {
        "name": "vacuum-device",
        "schema": {"levels": SIX_LEVELS, "pattern": SIX_PATTERN},
        "suffixes": SUFFIXES,
        "tree": [{
            "level": "system", "value": "VAC",
            "description": "vacuum system: gauge controller, ion gauge, setpoint relay and ion pump channels",
            "children": [{
                "level": "subsystem", "value": "GC", "description": "vacuum gauge controllers",
                "children": [{
                    "level": "device", "value": "GC001", "description": "gauge controller GC001",
                    "children": vacuum_device_children(ion_gauges, thermal_gauges),
                }],
            }],
        }],
    }


# -- six-level tutorial database -------------------------------------------

POWER_SUPPLY_SIGNALS = [
    signal("FWVER", "firmware version"),
    signal("CURR", "output current", "SP", "RB"),
    signal("VOLT", "output voltage", "RB"),
    signal("ONOFF", "output enable", "CMD", "RB"),
    signal("STAT", "supply status word"),
]  # 7
CAVITY_SIGNALS = [
    signal("FWVER", "firmware version"),
    signal("FREQ", "resonance frequency", "SP", "RB"),
    signal("AMPL", "field amplitude", "SP", "RB"),
    signal("PHASE", "field phase", "SP", "RB"),
    signal("FWD", "forward power", "RB"),
    signal("REFL", "reflected power", "RB"),
    signal("TEMP", "cavity body temperature", "RB"),
    signal("RFON", "radio frequency drive", "CMD", "RB"),
]  # 14
AMPLIFIER_SIGNALS = [
    signal("FWVER", "firmware version"),
    signal("OUTPWR", "amplifier output power", "SP", "RB"),
    signal("DRAIN", "transistor drain current", "RB"),
    signal("TEMP", "heatsink temperature", "RB"),
    signal("ENA", "amplifier enable", "CMD", "RB"),
]  # 7
BPM_SIGNALS = [
    signal("X", "horizontal beam position", "RB"),
    signal("Y", "vertical beam position", "RB"),
    signal("SUM", "button sum intensity", "RB"),
    signal("GAIN", "electronics gain", "SP", "RB"),
]  # 5
CT_SIGNALS = [
    signal("FWVER", "firmware version"),
    signal("CHARGE", "bunch charge", "RB"),
    signal("GAIN", "transformer gain range", "SP", "RB"),
]  # 4


def tutorial_config(scale: int = 1) -> dict[str, Any]:
    """Six-level database over four systems; 1,050 channels at ``scale=1``.

    ``scale`` multiplies the number of device instances and leaves the tree
    shape (levels, signal sets, descriptions) unchanged.
    """
    s = scale

    def device(prefix: str, n: int, desc: str, children: list[dict[str, Any]]) -> dict[str, Any]:
        return {"level": "device", "description": desc + " {value}", "expand": _range(prefix, n * s, 3),
                "children": children}

    tree = [
        {"level": "system", "value": "VAC", "description": "vacuum system: gauge controller, ion gauge, setpoint relay and ion pump channels", "children": [
            {"level": "subsystem", "value": "GC", "description": "vacuum gauge controllers", "children": [
                device("GC", 4, "gauge controller", vacuum_device_children(4, 0)),
            ]},
        ]},
        {"level": "system", "value": "RF", "description": "radio frequency system: accelerating cavity and solid state amplifier stations", "children": [
            {"level": "subsystem", "value": "CAV", "description": "accelerating cavities", "children": [
                device("CAV", 8, "cavity", CAVITY_SIGNALS),
            ]},
            {"level": "subsystem", "value": "SSA", "description": "solid state amplifiers", "children": [
                device("SSA", 8, "amplifier", AMPLIFIER_SIGNALS),
            ]},
        ]},
        {"level": "system", "value": "MAG", "description": "magnet system: quadrupole and corrector magnet power supply units", "children": [
            {"level": "subsystem", "value": "PSQ", "description": "quadrupole magnet power supplies", "children": [
                device("PSQ", 12, "quadrupole supply", POWER_SUPPLY_SIGNALS),
            ]},
            {"level": "subsystem", "value": "PSC", "description": "corrector magnet power supplies", "children": [
                device("PSC", 12, "corrector supply", POWER_SUPPLY_SIGNALS),
            ]},
        ]},
        {"level": "system", "value": "DIAG", "description": "beam diagnostics system: beam position monitor and current transformer", "children": [
            {"level": "subsystem", "value": "BPM", "description": "beam position monitors", "children": [
                device("BPM", 22, "monitor", BPM_SIGNALS),
            ]},
            {"level": "subsystem", "value": "CT", "description": "current transformers", "children": [
                device("CT", 5, "transformer", CT_SIGNALS),
            ]},
        ]},
    ]
    return {
        "name": "tutorial" if scale == 1 else f"tutorial-x{scale}",
        "schema": {"levels": SIX_LEVELS, "pattern": SIX_PATTERN},
        "suffixes": SUFFIXES,
        "glossary": {"setpoint": "set point setpoint", "readback": "read back readback"},
        "tree": tree,
    }


# -- flat FEL-style dictionary ---------------------------------------------

# (address template, name template or None, description template, count)
# count > 1 expands {index}; the address gets a two-digit instance number.
FEL_TEMPLATES: list[tuple[str, str, int]] = [
    ("TMVST", "terminal voltage set point", 1),
    ("TMVRD", "terminal voltage readback", 1),
    ("TMCRD", "terminal column current readback", 1),
    ("CHGRD", "terminal charging current readback", 1),
    ("GPSRD", "insulating gas pressure readback", 1),
    ("GTMRD", "insulating gas temperature readback", 1),
    ("CTHST", "cathode heater power set point", 1),
    ("CTHRD", "cathode heater power readback", 1),
    ("GRDST", "gun grid bias set point", 1),
    ("GRDRD", "gun grid bias readback", 1),
    ("PLSWD", "electron pulse width set point", 1),
    ("PLSRT", "electron pulse repetition rate set point", 1),
    ("BMCUR", "electron beam current readback", 1),
    ("RCVCU", "recovered beam current readback", 1),
    ("XPRST", "accelerator tank pressure readback", 1),
    ("CVTMP", "accelerator chiller water temperature", 1),
    ("QST{n}", "quadrupole {index} coil current set point", 30),
    ("QRD{n}", "quadrupole {index} coil current readback", 30),
    ("SXS{n}", "horizontal steerer {index} current set point", 20),
    ("SXR{n}", "horizontal steerer {index} current readback", 20),
    ("SYS{n}", "vertical steerer {index} current set point", 20),
    ("SYR{n}", "vertical steerer {index} current readback", 20),
    ("BND{n}", "bending magnet {index} field readback", 8),
    ("BNS{n}", "bending magnet {index} field set point", 8),
    ("VIG{n}", "vacuum ion gauge {index} pressure readback", 16),
    ("VIP{n}", "vacuum ion pump {index} current readback", 16),
    ("VLV{n}", "beamline gate valve {index} position status", 10),
    ("VLC{n}", "beamline gate valve {index} open close command", 10),
    ("SCR{n}", "fluorescent screen {index} insert command", 10),
    ("SCS{n}", "fluorescent screen {index} position status", 10),
    ("CAM{n}", "screen camera {index} video image", 10),
    ("BPX{n}", "beam position monitor {index} horizontal position readback", 10),
    ("BPY{n}", "beam position monitor {index} vertical position readback", 10),
    ("UGP", "undulator magnetic gap readback", 1),
    ("UGS", "undulator magnetic gap set point", 1),
    ("UTM", "undulator chamber temperature readback", 1),
    ("CAVLN", "optical cavity length set point", 1),
    ("CAVLR", "optical cavity length readback", 1),
    ("MIRX", "cavity mirror horizontal tilt set point", 1),
    ("MIRY", "cavity mirror vertical tilt set point", 1),
    ("THZPW", "terahertz output power readback", 1),
    ("THZFQ", "terahertz output frequency readback", 1),
    ("PYROD", "pyroelectric detector signal readback", 1),
    ("ATTEN", "output attenuator position set point", 1),
    ("SHUTC", "beamline shutter open close command", 1),
    ("SHUTS", "beamline shutter position status", 1),
    ("RFLTM", "water load temperature readback", 1),
    ("SF6LK", "insulating gas leak detector alarm status", 1),
    ("ERCST", "energy recovery collector voltage set point", 1),
    ("ERCRD", "energy recovery collector voltage readback", 1),
    ("DCTRD", "deceleration tube current readback", 1),
    ("INTLK", "personnel safety interlock status", 1),
    ("RADMN", "radiation monitor dose rate readback", 1),
    ("MODRT", "modulator trigger rate set point", 1),
    ("MODTR", "modulator trigger enable command", 1),
    ("TIMDL", "master timing delay set point", 1),
    ("TIMRD", "master timing delay readback", 1),
    ("SYSOK", "machine ready summary status", 1),
]


def fel_config(names: dict[str, str] | None = None) -> dict[str, Any]:
    """Flat dictionary of cryptic legacy addresses (58 templates, ~300 records).

    ``names`` maps template address -> name template (``{index}`` allowed);
    without it the records carry no human-readable names yet.
    """
    tree = []
    for addr, desc, count in FEL_TEMPLATES:
        node: dict[str, Any] = {"level": "address", "description": desc}
        if count == 1:
            node["value"] = addr
        else:
            node["expand"] = {"range": {"prefix": addr.replace("{n}", ""), "lo": 1, "hi": count, "pad": 2}}
        if names and addr in names:
            node["name"] = names[addr]
        tree.append(node)
    return {
        "name": "fel",
        "schema": {"levels": [{"name": "address"}], "pattern": "{address}"},
        "suffixes": {},
        "glossary": {"setpoint": "set point", "rb": "readback", "sp": "set point"},
        "tree": tree,
    }


# -- compositional FACILITY/DEVICE/LOCATION/PROPERTY -----------------------

_XFEL_PROPERTIES = {
    "CAMERA": [
        ("IMAGE", "The camera image (8 bit)"),
        ("GAIN", "Camera amplifier gain"),
        ("EXPOSURE", "Camera exposure time in microseconds"),
        ("TRIGGER.DELAY", "Camera trigger timing delay"),
    ],
    "BPM": [
        ("X.TD", "Horizontal orbit displacement per bunch train"),
        ("Y.TD", "Vertical orbit displacement per bunch train"),
        ("CHARGE.TD", "Bunch charge seen by the pickup"),
        ("STATUS", "Electronics health flag"),
    ],
    "TOROID": [
        ("CHARGE", "Integrated bunch charge from the toroid"),
        ("RANGE", "Toroid amplifier range setting"),
    ],
    "BLM": [
        ("SIGNAL", "Beam loss monitor photomultiplier signal"),
        ("THRESHOLD", "Loss alarm threshold"),
        ("HV", "Photomultiplier tube high voltage"),
    ],
    "MAGNET": [
        ("CURRENT.SP", "Coil current setting requested from the supply"),
        ("CURRENT.RBV", "Coil current measured at the supply"),
        ("STRENGTH", "Normalised focusing strength"),
    ],
    "CORRECTOR": [
        ("KICK.SP", "Steering kick angle setting"),
        ("KICK.RBV", "Steering kick angle measured"),
    ],
    "KLYSTRON": [
        ("POWER.FW", "Klystron forward output power"),
        ("HV.SP", "Modulator cathode voltage setting"),
        ("INTERLOCK", "Klystron interlock summary"),
    ],
    "CAVITY": [
        ("AMPL", "Accelerating gradient amplitude"),
        ("PHASE", "Accelerating field phase"),
        ("QL", "Loaded quality factor"),
    ],
    "PUMP": [
        ("PRESSURE", "Ion pump derived vacuum pressure"),
        ("VOLTAGE", "Ion pump anode voltage"),
    ],
    "VALVE": [
        ("STATE", "Gate valve open closed position"),
        ("CMD", "Gate valve actuate request"),
    ],
}

_XFEL_SECTIONS = [
    ("I1", "injector"), ("L1", "first linac"), ("B1", "first bunch compressor"),
    ("L2", "second linac"), ("B2", "second compressor"), ("TL", "transport line"),
    ("SA1", "SASE1 undulator"), ("SA2", "SASE2 undulator"), ("T4", "tunnel four"),
]


def xfel_config(locations_per_device: int = 6, seed: int = 7) -> dict[str, Any]:
    """FACILITY/DEVICE/LOCATION/PROPERTY database in DOOCS style."""
    rng = random.Random(seed)
    facilities = [
        ("XFEL.DIAG", "XFEL diagnostics", ["CAMERA", "BPM", "TOROID", "BLM"]),
        ("XFEL.MAGNETS", "XFEL magnets", ["MAGNET", "CORRECTOR"]),
        ("XFEL.RF", "XFEL radio frequency", ["KLYSTRON", "CAVITY"]),
        ("XFEL.VAC", "XFEL vacuum", ["PUMP", "VALVE"]),
        ("FLASH.DIAG", "FLASH facility diagnostics", ["CAMERA", "BPM", "TOROID"]),
    ]
    device_desc = {
        "CAMERA": "screen camera", "BPM": "beam position monitor", "TOROID": "charge toroid",
        "BLM": "beam loss monitor", "MAGNET": "quadrupole magnet", "CORRECTOR": "steering corrector",
        "KLYSTRON": "klystron station", "CAVITY": "superconducting cavity",
        "PUMP": "ion pump", "VALVE": "gate valve",
    }
    loc_prefix = {
        "CAMERA": "OTRC", "BPM": "BPMA", "TOROID": "TORA", "BLM": "BLM", "MAGNET": "Q",
        "CORRECTOR": "CKX", "KLYSTRON": "KLY", "CAVITY": "C", "PUMP": "IPP", "VALVE": "VGV",
    }
    tree = []
    for fac, fdesc, devices in facilities:
        dev_nodes = []
        for dev in devices:
            used: set[int] = set()
            locs = []
            while len(locs) < locations_per_device:
                pos = rng.randint(10, 999)
                if pos in used:
                    continue
                used.add(pos)
                sec, sdesc = rng.choice(_XFEL_SECTIONS)
                loc = f"{loc_prefix[dev]}.{pos}.{sec}"
                locs.append({
                    "level": "location", "value": loc,
                    "description": f"{device_desc[dev]} at position {pos} in the {sdesc}",
                    "children": [
                        {"level": "property", "value": p, "description": pdesc}
                        for p, pdesc in _XFEL_PROPERTIES[dev]
                    ],
                })
            locs.sort(key=lambda n: n["value"])
            dev_nodes.append({"level": "device", "value": dev, "description": f"{device_desc[dev]}s",
                              "children": locs})
        tree.append({"level": "facility", "value": fac, "description": fdesc, "children": dev_nodes})
    return {
        "name": "xfel",
        "schema": {
            "levels": ["facility", "device", "location", "property"],
            "pattern": "{facility}/{device}/{location}/{property}",
        },
        "suffixes": {},
        "tree": tree,
    }


# -- random trees ----------------------------------------------------------

def random_config(seed: int, max_depth: int = 4, max_children: int = 3) -> dict[str, Any]:
    """Random schema + tree with optional levels, terminals and expansions."""
    rng = random.Random(seed)
    depth = rng.randint(1, max_depth)
    levels = [{"name": f"l{i}", "optional": i > 0 and rng.random() < 0.4} for i in range(depth)]
    seps = ["-", ":", ".", "/"]
    pattern = "".join(("" if i == 0 else rng.choice(seps)) + f"{{{i}}}" for i in range(depth))
    counter = iter(range(10**6))

    def make(level: int) -> dict[str, Any]:
        uid = next(counter)
        node: dict[str, Any] = {"level": f"l{level}", "value": f"N{uid}", "description": f"node {uid}"}
        r = rng.random()
        if r < 0.3:
            node["expand"] = {"range": {"prefix": f"R{uid}X", "lo": rng.randint(0, 3),
                                        "hi": rng.randint(3, 6), "pad": rng.randint(0, 2)}}
        elif r < 0.45:
            node["expand"] = {"list": [f"L{uid}X{j}" for j in range(rng.randint(1, 3))]}
        tail_optional = all(lv["optional"] for lv in levels[level + 1:])
        remaining = depth - level - 1
        if remaining > 0 and (not tail_optional or rng.random() < 0.85):
            kids = []
            for _ in range(rng.randint(1, max_children)):
                nxt = level + 1
                # jump over optional levels now and then
                while nxt < depth - 1 and levels[nxt]["optional"] and rng.random() < 0.3:
                    nxt += 1
                kids.append(make(nxt))
            node["children"] = kids
            node["terminal"] = tail_optional and rng.random() < 0.3
        return node

    tree = [make(0) for _ in range(rng.randint(1, max_children))]
    return {"name": f"random-{seed}", "schema": {"levels": levels, "pattern": pattern}, "tree": tree}
