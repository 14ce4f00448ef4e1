namespace perfhom {}
