"""Independent AIVDM encoder used to produce the frozen decoder fixtures.

Bit layouts from https://gpsd.gitlab.io/gpsd/AIVDM.html (types 1 and 5).
Prints sentences with the field values they carry.
"""
import random


def armor(bits):
    fill = (-len(bits)) % 6
    bits = bits + "0" * fill
    out = []
    for i in range(0, len(bits), 6):
        v = int(bits[i:i + 6], 2)
        out.append(chr(v + 48 if v < 40 else v + 56))
    return "".join(out), fill


def field(value, width):
    if value < 0:
        value += 1 << width
    return format(value, "0{}b".format(width))


def checksum(body):
    c = 0
    for ch in body:
        c ^= ord(ch)
    return c


def sentence(payload, fill, channel="A", count=1, index=1, msg_id=""):
    body = "AIVDM,{},{},{},{},{},{}".format(count, index, msg_id, channel, payload, fill)
    return "!{}*{:02X}".format(body, checksum(body))


def type1(mmsi, sog, lon_raw, lat_raw, cog, heading=511, second=60):
    bits = (field(1, 6) + field(0, 2) + field(mmsi, 30) + field(0, 4) + field(-128, 8) + field(sog, 10)
            + field(0, 1) + field(lon_raw, 28) + field(lat_raw, 27) + field(cog, 12) + field(heading, 9)
            + field(second, 6) + field(0, 2) + field(0, 3) + field(0, 1) + field(0, 19))
    assert len(bits) == 168
    return armor(bits)


def sixbit_text(s, chars):
    s = s.ljust(chars, "@")
    out = ""
    for ch in s:
        v = ord(ch)
        v = v - 64 if v >= 64 else v
        out += field(v, 6)
    return out


def type5(mmsi, shiptype, name="TEST VESSEL"):
    bits = (field(5, 6) + field(0, 2) + field(mmsi, 30) + field(0, 2) + field(1234567, 30)
            + sixbit_text("CALL", 7) + sixbit_text(name, 20) + field(shiptype, 8) + field(10, 9) + field(20, 9)
            + field(3, 6) + field(4, 6) + field(1, 4) + field(1, 4) + field(15, 5) + field(12, 6) + field(8, 5)
            + field(60, 8) + sixbit_text("HAMBURG", 20) + field(0, 1) + field(0, 1))
    assert len(bits) == 424, len(bits)
    return armor(bits)


if __name__ == "__main__":
    cases = [
        (211000001, 123, int(round(7.1234 * 600000)), int(round(54.5678 * 600000)), 2345),
        (366123456, 0, int(round(-122.4194 * 600000)), int(round(37.7749 * 600000)), 0),
        (999999999, 1022, -180 * 600000, -90 * 600000, 3599),
        (1, 55, 180 * 600000, 90 * 600000, 1800),
    ]
    for c in cases:
        p, f = type1(*c)
        print(c, sentence(p, f))
    p, f = type5(211000001, 70)
    print("type5", len(p), f)
    print(sentence(p[:60], 0, "B", 2, 1, 3))
    print(sentence(p[60:], f, "B", 2, 2, 3))
