#!/usr/bin/env python3
"""Reference dumps for the binary fixtures, produced with pyelftools.

usage: line_golden.py lines ELF            > X.lines.golden
       line_golden.py map ELF DISASSEMBLY  > X.map.golden

lines: one row per line-table entry, "address file line column is_stmt end_sequence".
map:   one row per instruction, "address file line" after standard row attribution
       ("-" for instructions outside every sequence).
"""
import re
import sys

from elftools.elf.elffile import ELFFile


def rows(path):
    out = []
    with open(path, "rb") as f:
        elf = ELFFile(f)
        dwarf = elf.get_dwarf_info()
        for cu in dwarf.iter_CUs():
            prog = dwarf.line_program_for_CU(cu)
            if prog is None:
                continue
            version = prog.header["version"]
            files = prog.header["file_entry"]
            for entry in prog.get_entries():
                st = entry.state
                if st is None:
                    continue
                idx = st.file if version >= 5 else st.file - 1
                name = files[idx].name.decode() if 0 <= idx < len(files) else "?"
                out.append((st.address, name, st.line, st.column, int(st.is_stmt), int(st.end_sequence)))
    return out


def instructions(path):
    addrs = []
    pat = re.compile(r"^\s*([0-9a-f]+):\t[0-9a-f ]+\t(\S+)")
    with open(path) as f:
        for line in f:
            m = pat.match(line)
            if m:
                addrs.append(int(m.group(1), 16))
    return addrs


def attribute(table, addrs):
    seqs, cur = [], []
    for r in table:
        cur.append(r)
        if r[5]:
            seqs.append(cur)
            cur = []
    out = []
    for a in addrs:
        hit = None
        for seq in seqs:
            if not (seq[0][0] <= a < seq[-1][0]):
                continue
            for r in seq[:-1]:
                if r[0] <= a:
                    hit = r
        out.append((a, hit))
    return out


def main():
    mode, elf = sys.argv[1], sys.argv[2]
    table = rows(elf)
    if mode == "lines":
        for r in table:
            print("%#x %s %d %d %d %d" % r)
    elif mode == "map":
        for a, r in attribute(table, instructions(sys.argv[3])):
            print("%#x - 0" % a if r is None else "%#x %s %d" % (a, r[1], r[2]))
    else:
        sys.exit("unknown mode " + mode)


if __name__ == "__main__":
    main()
