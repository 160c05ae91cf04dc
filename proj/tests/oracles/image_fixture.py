#!/usr/bin/env python3
"""Write the committed image-set fixture and its expected statistics.

Histogram convention: ratio = 100 * width / height, bins of 10 points,
bin base = floor(ratio / 10) * 10, ratios >= MAX_RATIO go to the overflow
bin whose base is MAX_RATIO. Dimensions are read back with Pillow.

    python3 tests/oracles/image_fixture.py tests/fixtures/images
"""
import json
import os
import sys

from PIL import Image

MAX_RATIO = 300

LAYOUT = {
    "img_01": [("01.jpg", "JPEG", (224, 224)), ("02.jpg", "JPEG", (225, 300)),
               ("03.jpg", "JPEG", (300, 100)), ("04.jpg", "JPEG", (97, 300)),
               ("05.jpg", "JPEG", (500, 400))],
    "img_02": [("01.jpg", "JPEG", (640, 480)), ("02.jpg", "JPEG", (480, 640)),
               ("03.jpg", "JPEG", (250, 250)), ("04.jpg", "PNG", (320, 240)),
               ("06.jpg", "JPEG", (1000, 10))],
    "img_03": [("01.jpg", "JPEG", (10, 1000)), ("02.jpg", "JPEG", (299, 100)),
               ("03.jpg", "JPEG", (226, 225)), ("20.jpg", "JPEG", (190, 100))],
}
CORRUPT = ("img_03", "04.jpg")
IGNORED = [("img_01", "meta.json"), ("img_02", "21.jpg"), ("img_03", "1.jpg")]
MISSING_SITE = "img_04"


def write(root):
    for site, files in LAYOUT.items():
        os.makedirs(os.path.join(root, site), exist_ok=True)
        for name, fmt, (w, h) in files:
            img = Image.new("RGB", (w, h), ((w * 7) % 256, (h * 3) % 256, 90))
            img.save(os.path.join(root, site, name), format=fmt)
    with open(os.path.join(root, *CORRUPT), "wb") as f:
        f.write(b"\xff\xd8\xff\xe0 not really a jpeg")
    for site, name in IGNORED:
        with open(os.path.join(root, site, name), "w") as f:
            f.write("{}\n")
    with open(os.path.join(root, "manifest.csv"), "w") as f:
        f.write("site_id,url,label,split,language,screenshot_path,text_path\n")
        for i, site in enumerate(list(LAYOUT) + [MISSING_SITE]):
            label = ["machinery", "music", "sport", "tourism"][i % 4]
            f.write("%s,https://%s.example.net/,%s,test,,,\n" % (site, site, label))


def expected(root):
    hist = {}
    total = 0
    over_224 = 0
    per_site = {}
    corrupt = []
    for site in list(LAYOUT) + [MISSING_SITE]:
        d = os.path.join(root, site)
        count = 0
        names = sorted(os.listdir(d)) if os.path.isdir(d) else []
        for name in names:
            stem, ext = os.path.splitext(name)
            if ext != ".jpg" or len(stem) != 2 or not stem.isdigit():
                continue
            if not 1 <= int(stem) <= 20:
                continue
            try:
                with Image.open(os.path.join(d, name)) as im:
                    w, h = im.size
            except Exception:
                corrupt.append(site + "/" + name)
                continue
            count += 1
            total += 1
            base = (10 * w // h) * 10
            base = min(base, MAX_RATIO)
            hist[base] = hist.get(base, 0) + 1
            if w > 224 and h > 224:
                over_224 += 1
        per_site[site] = count
    return {
        "max_ratio": MAX_RATIO,
        "total_images": total,
        "min_dim_gt_224_count": over_224,
        "histogram": [{"bin_base_percent": b, "count": hist.get(b, 0)}
                      for b in range(0, MAX_RATIO + 1, 10)],
        "per_site_image_counts": per_site,
        "corrupt": corrupt,
    }


def main(root):
    write(root)
    with open(os.path.join(root, "..", "images_expected.json"), "w") as f:
        json.dump(expected(root), f, indent=1)
        f.write("\n")


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else "tests/fixtures/images")
