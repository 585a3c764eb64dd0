"""Print the three-line packed evaluation at (10, 15), mask by mask."""

from wordloc import swar


def fmt(word: int, lanes: int = 3, width: int = 14) -> str:
    return " ".join(format((word >> (i * width)) & ((1 << width) - 1), f"0{width}b") for i in reversed(range(lanes)))


def main():
    lay = swar.make_layout(12, 64)
    a = [1, 2, -5]
    b = [2, 4, 6]
    c = [0, -3, 7]
    mags, signs = swar.pack(a, lay)
    A, B = swar.broadcast_multiply(mags, signs, 10)
    print("A (a * 10 magnitudes)", fmt(A.bits))
    print("B (signs)            ", fmt(B.bits))
    steps = swar.complement_steps(A, B)
    for name in "CDEFG":
        print(f"{name}                    ", fmt(getattr(steps, name)))
    ax = swar.to_twos_complement(A, B)
    by = swar.to_twos_complement(*swar.broadcast_multiply(*swar.pack(b, lay), 15))
    total = swar.lanewise_add(swar.lanewise_add(ax, by), swar.pack_signed(c, lay))
    print("a*10 + b*15 + c      ", swar.unpack(total))
    print("negative lanes       ", format(swar.extract_sign_bits(total), "03b"))
    print("zero lanes           ", format(swar.find_zero_lanes(total), "03b"))


if __name__ == "__main__":
    main()
