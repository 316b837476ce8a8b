"""Registry of frame part tags.

Every serialized artifact in this package is a tag+length frame; this module
is the single authority on what each one-byte role id means. Tags only need
to be unique within a frame, but keeping the registry global keeps stored
records self-describing.
"""

from enum import IntEnum, unique


@unique
class Tag(IntEnum):
    # message pipeline
    SIG = 0x01            # origin signature over the message digest
    MSG_HDR = 0x02        # framed message header fields
    BODY = 0x03           # message body bytes
    SYM_CT = 0x04         # symmetric ciphertext (IV prefix + CBC blocks)
    WRAPPED_KEY = 0x05    # session key wrapped to the recipient
    RECEIPT_SIG = 0x06    # receiver's cleartext receipt signature
    SEALED_RCPT = 0x07    # receipt signature sealed for the sender
    MESSAGE = 0x08        # canonical message bytes

    # message header fields
    FROM = 0x10
    TO = 0x11
    SUBJECT = 0x12
    DATE = 0x13

    # envelope / receipt metadata
    MESSAGE_ID = 0x20
    SENDER = 0x21
    RECIPIENT = 0x22
    SUITE_ID = 0x23
    UPLOAD_TIME = 0x24
    UPLOAD_TOKEN = 0x25
    ISSUED_AT = 0x26
    SIG_ALG = 0x27
    SIGNER = 0x28

    # key material
    KEY_OWNER = 0x30
    KEY_ROLE = 0x31
    KEY_ALG = 0x32
    KEY_PUBLIC_DER = 0x33
    KEY_PRIVATE_DER = 0x34
    SIGNING_KEY = 0x35
    ENCRYPTION_KEY = 0x36

    # evidence records
    EV_KIND = 0x40
    EV_DIGEST = 0x41
    EV_DIGEST_ALG = 0x42
    RECORDED_AT = 0x43
    EV_RECORD = 0x44
    PUBKEY_BLOB = 0x45

    # sealed blobs
    SEAL_MODE = 0x50
    SEAL_CT = 0x51

    # directory / server records
    PW_BLOB = 0x60
    CREATED_AT = 0x61
    ESCROW_STATE = 0x62
    RELEASED_AT = 0x63
    RECEIPT_BLOB = 0x64
    ENTRY_KIND = 0x65
    FORWARDED_AT = 0x66
    OPENED = 0x67

    # keyring files
    KDF_SALT = 0x70
    KDF_PARAMS = 0x71
    KEYRING_CT = 0x72
