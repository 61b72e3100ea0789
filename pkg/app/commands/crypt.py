import argparse

from . import cipher_options, key_options, lfsr_options
from .. import container, dependencies
from ..cipher import config_from_header, decrypt_image, encrypt_image
from ..imageio import load_image, save_image
from ..metrics import export_bitstream
from ..schemas import BitstreamFormat


def encrypt(args: argparse.Namespace) -> int:
    key = dependencies.get_key(args, required=True)
    cfg = dependencies.get_cipher_config(args)
    ct = encrypt_image(load_image(args.input), key, cfg)
    container.write_ciphertext(ct, args.output)
    return 0


def decrypt(args: argparse.Namespace) -> int:
    key = dependencies.get_key(args, required=True)
    ct = container.read_ciphertext(args.input)
    cfg = config_from_header(ct.header, dependencies.get_lfsr(args))
    save_image(decrypt_image(ct, key, cfg), args.output)
    return 0


def export(args: argparse.Namespace) -> int:
    bits = export_bitstream(dependencies.load_any(args.input), args.output, BitstreamFormat(args.format))
    print(f"bits={bits}")
    return 0


def register(subparsers) -> None:
    enc = subparsers.add_parser("encrypt", parents=[key_options(), cipher_options()], help="Encrypt an image")
    enc.add_argument("--in", dest="input", required=True, help="PPM, PGM or BMP image")
    enc.add_argument("--out", dest="output", required=True, help="Ciphertext container (.cbs)")
    enc.set_defaults(handler=encrypt)

    dec = subparsers.add_parser("decrypt", parents=[key_options(), lfsr_options()], help="Decrypt a ciphertext container")
    dec.add_argument("--in", dest="input", required=True, help="Ciphertext container (.cbs)")
    dec.add_argument("--out", dest="output", required=True, help="Decrypted image (.ppm, .pgm or .bmp)")
    dec.set_defaults(handler=decrypt)

    exp = subparsers.add_parser("export", help="Export an image or ciphertext body as a bitstream")
    exp.add_argument("--in", dest="input", required=True)
    exp.add_argument("--out", dest="output", required=True)
    exp.add_argument("--format", choices=[f.value for f in BitstreamFormat], default=BitstreamFormat.RAW.value)
    exp.set_defaults(handler=export)
